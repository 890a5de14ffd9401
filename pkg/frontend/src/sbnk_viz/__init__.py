"""Offline plotting for solver run outputs.

Reads only the documented external formats (cauchy.csv, diagnostics.csv,
FieldArchive binaries); no in-process coupling to the solver package.
"""
