"""Exception types shared across the library."""


class ShapeError(ValueError):
    """An array has the wrong rank, extents, or an incompatible layout."""


class ValidationError(ValueError):
    """A value violates a documented precondition (range, finiteness, config)."""


class DegenerateBackgroundError(ValueError):
    """The background window is (numerically) constant, so the saliency ratio is undefined."""


class PgmParseError(ValueError):
    """A PGM stream is malformed. Carries the byte offset of the defect."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset
