def f():
    pass

if (x := f):
    x()
