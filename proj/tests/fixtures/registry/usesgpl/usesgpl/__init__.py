from copyleft import share


def run(x):
    return share(x)
