def join(a, *p):
    path = a
    for b in p:
        path = path + "/" + b
    return path


def exists(path):
    return False
