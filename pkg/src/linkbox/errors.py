class LinkboxError(Exception):
    """Base class for errors raised by this package."""


class GraphFormatError(LinkboxError):
    def __init__(self, source: str, lineno: int, message: str):
        super().__init__(f"{source}:{lineno}: {message}")
        self.source = source
        self.lineno = lineno


class DanglingReferenceError(LinkboxError):
    pass


class UnknownNodeError(LinkboxError, KeyError):
    def __str__(self) -> str:
        return f"unknown node: {self.args[0]!r}"


class UndefinedMeasureError(LinkboxError, ValueError):
    pass


class NoLabelError(LinkboxError):
    pass
