"""Exception hierarchy shared by the registration routines."""


class GridError(ValueError):
    """Invalid grid construction or indexing."""


class RegistrationError(ValueError):
    """Base class for failures while registering an image pair."""


class DimensionMismatchError(RegistrationError):
    """The two images do not have the same width and height."""


class DegeneratePeakError(RegistrationError):
    """The correlation surface is too flat to locate a subpixel peak."""


class ConstantImageError(DegeneratePeakError):
    """An input image has a single value everywhere, so its correlation is flat."""


class RankDeficientError(RegistrationError):
    """Too few usable frequencies to fit a phase plane."""
