def f():
    pass

def g():
    pass

def run(a, b=None, *, c):
    a()
    c()

run(f, c=g)
