class A:
    def __init__(self):
        self.v = 1

    def m(self):
        return self.v

a = A()
a.m()
