def f():
    pass

def run(first, *rest):
    first()

run(f, 1, 2)
