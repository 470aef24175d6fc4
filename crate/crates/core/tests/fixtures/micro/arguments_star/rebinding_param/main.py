def f():
    pass

def g():
    pass

def run(a):
    a = g
    a()

run(f)
