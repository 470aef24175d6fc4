def helper():
    inner()

def inner():
    pass
