from ..mapper import ArgumentMapper


class ArgumentSpec:

    def __init__(self, name=None, positional=None, defaults=None):
        self.name = name
        self.positional = positional or []
        self.defaults = defaults or {}

    def map(self, positional, named, replace_defaults=True):
        mapper = ArgumentMapper(self)
        return mapper.map(positional, named, replace_defaults)
