def namedtuple_like(raw):
    return _split(raw)


def _split(raw):
    return raw.split()
