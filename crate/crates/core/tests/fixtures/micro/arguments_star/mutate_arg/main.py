class Box:
    pass

def f():
    pass

def g():
    pass

def fill(b):
    b.fn = g

box = Box()
box.fn = f
fill(box)
box.fn()
