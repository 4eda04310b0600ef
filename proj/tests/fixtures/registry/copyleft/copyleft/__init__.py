def share(x):
    return x
