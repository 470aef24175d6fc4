def dec(f):
    def inner():
        return f()
    return inner

@dec
def one():
    pass

@dec
def two():
    pass

one()
two()
