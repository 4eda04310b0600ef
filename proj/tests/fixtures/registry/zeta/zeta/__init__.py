from textfmt import wrap, pad


def banner(text, width):
    rows = wrap(text, width)
    return [pad(r, width + 2) for r in rows]


def boxed(text, width):
    rows = banner(text, width)
    return rows
