def sleep(secs):
    pass


def time():
    return 0.0
