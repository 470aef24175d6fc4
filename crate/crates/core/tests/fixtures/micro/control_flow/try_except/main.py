def f():
    pass

def g():
    pass

def h():
    pass

def run():
    x = f
    try:
        x = g
        raise ValueError("x")
    except ValueError:
        x = h
    x()

run()
