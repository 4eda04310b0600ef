class ArgumentMapper:

    def __init__(self, spec):
        self.spec = spec

    def map(self, positional, named, replace_defaults=True):
        values = list(positional)
        for name in self.spec.positional[len(values):]:
            if name in named:
                values.append(named.pop(name))
            elif replace_defaults and name in self.spec.defaults:
                values.append(self.spec.defaults[name])
        return values, named
