"""Executable workbench for closed choice problems, their realizers and reductions."""
