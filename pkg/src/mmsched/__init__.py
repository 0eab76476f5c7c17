"""Continuous-time MILP formulations for multi-mode project scheduling."""
from .core import (BUILTIN_INSTANCES, Instance, InstanceError, Mode, Schedule,
                   ScheduleStructureError, ValidationReport, example1_instance,
                   remark_instance, validate_schedule)
from .formulations import (MODEL_KINDS, FormulationOptions, build_model, certificate_points,
                           decode, lemma1_point, parse_model_spec)
from .io import parse_mmlib, parse_psplib_mm, read_instance, scale_renewables, strip_renewables
from .milp import MilpModel, eval_point, relax, stats, write_lp, write_mps
from .oracle import ma_feasible, solve_exact
from .preprocess import build_aon, incompatible_pairs, resource_strength, time_windows
from .solve import SolveOutcome, SolveRequest, solve

__version__ = "0.1.0"
