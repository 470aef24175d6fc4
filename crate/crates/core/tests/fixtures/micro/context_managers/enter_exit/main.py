class CM:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def m(self):
        pass

with CM() as c:
    c.m()
