def func1():
    pass

def func2(a):
    a()

func2(func1)
