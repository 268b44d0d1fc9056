from itertools import islice
import logging
log = logging.getLogger()


def listify(x):
    """ allow single item to be treated same as list. simplifies loops and list comprehensions """
    if isinstance(x, tuple):
        return list(x)
    if not isinstance(x, list):
        return [x]
    return x


def batched(items, size):
    """ yield lists of up to size items in order

    sweeps write results after each batch so an interrupted run can resume
    """
    if size < 1:
        raise ValueError(f"batch size must be positive not {size}")
    items = iter(items)
    while True:
        batch = list(islice(items, size))
        if not batch:
            return
        yield batch
