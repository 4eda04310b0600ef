def helper(x):
    return x


def first():
    # helper is called below
    return helper(1)


def second():
    return helper(2)


def unused(y):
    return y
