from .ops import dot, scale, norm
