def f():
    pass

def g():
    pass

def run(flag):
    x = f
    if flag:
        x = g
    x()

run(True)
run(False)
