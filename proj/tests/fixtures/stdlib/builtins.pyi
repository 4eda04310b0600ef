class object:
    def __init__(self) -> None: ...

def len(obj: object, /) -> int: ...
def print(*values: object, sep: str = ..., end: str = ...) -> None: ...
def min(*args: object) -> object: ...
def max(*args: object) -> object: ...
def sum(iterable: object, start: int = ...) -> int: ...
def zip(*iterables: object) -> object: ...
def repr(obj: object, /) -> str: ...
def range(stop: int) -> object: ...
def tuple(iterable: object = ...) -> object: ...
def list(iterable: object = ...) -> object: ...
def int(x: object = ...) -> int: ...
def str(object: object = ...) -> str: ...
def type(o: object, /) -> object: ...
class ValueError(Exception): ...
