from .stats import mean, variance
