def f():
    pass

table = {"a": f}
table["a"]()
