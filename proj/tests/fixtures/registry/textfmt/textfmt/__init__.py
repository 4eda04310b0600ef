from .core import shorten, pad


def wrap(text, width):
    lines = []
    while len(text) > width:
        lines.append(pad(text[:width], width))
        text = text[width:]
    lines.append(pad(text, width))
    return lines
