def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def scale(u, factor):
    return [a * factor for a in u]


def norm(u):
    return dot(u, u) ** 0.5
