def clamp(value, low, high):
    return max(low, min(value, high))


def lerp(a, b, t):
    return a + (b - a) * t


def blend(a, b, t):
    t = clamp(t, 0.0, 1.0)
    return lerp(a, b, t)


def ramp(a, b, steps):
    return [lerp(a, b, i / steps) for i in range(steps + 1)]
