class Holder:
    pass

def f():
    pass

h = Holder()
h.fn = f
h.fn()
