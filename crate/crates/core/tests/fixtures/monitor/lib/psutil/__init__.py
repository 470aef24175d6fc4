from psutil._common import namedtuple_like


def pid():
    return _read("stat")


def virtual_memory():
    return namedtuple_like(_read("meminfo"))


def _read(name):
    return name
