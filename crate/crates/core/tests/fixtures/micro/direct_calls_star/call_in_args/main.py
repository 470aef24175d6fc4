def a():
    return 1

def b(x):
    pass

b(a())
