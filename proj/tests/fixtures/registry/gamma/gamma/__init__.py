from beta import fade, tint


def palette(base, steps):
    out = []
    for i in range(steps):
        out.append(fade(base, i / steps))
        out.append(tint(base, i / steps))
    return out


def shade(base, amount):
    return fade(base, amount)
