class Fn:
    def __call__(self):
        pass

f = Fn()
f()
