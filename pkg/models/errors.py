from typing import Optional


class KJClassError(Exception):
    """Base class for every error raised by the library."""


class ParseError(KJClassError):
    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class ResourceLimitError(KJClassError):
    """A configured size cap was exceeded."""


class IllegalEventError(KJClassError):
    def __init__(self, message: str, frame: Optional[int] = None):
        self.frame = frame
        if frame is not None:
            message = f"frame {frame}: {message}"
        super().__init__(message)


class UnsupportedEventError(IllegalEventError):
    """Reserved event kinds (r3) that have no induced map."""


class FrameMismatchError(KJClassError):
    def __init__(self, message: str, frame: Optional[int] = None):
        self.frame = frame
        if frame is not None:
            message = f"frame {frame}: {message}"
        super().__init__(message)


class MissingNestingError(KJClassError):
    """Seifert circle nesting is undeclared or inconsistent."""


class DimensionError(KJClassError):
    """Matrix and vector sizes do not agree."""
