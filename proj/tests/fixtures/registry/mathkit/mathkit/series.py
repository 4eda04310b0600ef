import os

from .stats import mean, total, variance


class Series:

    def __init__(self, values, name="series"):
        self.values = list(values)
        self.name = name

    def mean(self):
        return mean(self.values)

    def variance(self, ddof=0):
        return variance(self.values, ddof)

    def cumulative(self):
        out = []
        for i in range(len(self.values)):
            out.append(total(self.values[: i + 1]))
        return out

    def path(self, root):
        return os.path.join(root, self.name)

    def label(self):
        return os.path.join(self.name, "data.csv")

    def reset(self):
        self.values.clear()
        self.refresh()

    def refresh(self):
        self.name = str(self.name)


def make_series(values):
    s = Series(values)
    return s.variance(ddof=1)
