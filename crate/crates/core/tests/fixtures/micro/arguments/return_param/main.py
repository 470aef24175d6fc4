def ident(x):
    return x

def work():
    pass

ident(work)()
