def apply(f):
    return f()

def target():
    pass

apply(lambda: target())
