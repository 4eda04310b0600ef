class Counter:

    def __init__(self, start=0):
        self.count = start

    def bump(self, by):
        self.count += by
        return self.count

    def bump_twice(self, by):
        self.bump(by)
        return self.bump(by)


def tally(items, counter):
    for item in items:
        counter.bump(item)
    return counter.count
