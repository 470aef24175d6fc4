def log(f):
    def inner(*args):
        return f(*args)
    return inner

class A:
    @log
    def m(self):
        pass

A().m()
