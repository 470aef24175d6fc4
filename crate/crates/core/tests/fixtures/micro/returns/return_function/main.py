def f():
    pass

def get():
    return f

x = get()
x()
