class K:
    pass

def f():
    pass

def g():
    pass

k = K()
k.fn = f
k.fn = g
k.fn()
