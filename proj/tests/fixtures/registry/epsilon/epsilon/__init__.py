from delta import Counter, tally


def count_all(groups):
    counter = Counter(0)
    for group in groups:
        tally(group, counter)
    return counter.count


def count_one(group, start):
    counter = Counter(start)
    return tally(group, counter)
