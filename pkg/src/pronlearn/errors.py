class InputError(ValueError):
    """Malformed or inconsistent input data (files, symbols, lexicon entries)."""
