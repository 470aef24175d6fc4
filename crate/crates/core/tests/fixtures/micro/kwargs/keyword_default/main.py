def f():
    pass

def g():
    pass

def run(a=f, b=g):
    b()

run(b=f)
