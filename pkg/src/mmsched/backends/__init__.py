"""Small programs that adapt concrete solvers to the neutral solution format."""
