"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or inconsistent input data (files, labels, shapes)."""


class DegenerateModelError(ValueError):
    """A model cannot be fitted: single-class data, unsplittable folds, etc."""
