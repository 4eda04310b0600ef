from alpha import clamp, lerp


def fade(color, amount):
    amount = clamp(amount, 0.0, 1.0)
    return tuple(lerp(c, 0, amount) for c in color)


def tint(color, amount):
    amount = clamp(amount, 0.0, 1.0)
    return tuple(lerp(c, 255, amount) for c in color)


def mix(first, second, amount):
    return tuple(lerp(a, b, amount) for a, b in zip(first, second))
