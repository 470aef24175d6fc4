def f():
    pass

def g():
    pass

def run(a, b):
    a()
    b()

run(b=g, a=f)
