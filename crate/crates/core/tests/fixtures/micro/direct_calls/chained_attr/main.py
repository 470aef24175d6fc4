class C:
    def m(self):
        pass

class B:
    def __init__(self):
        self.c = C()

class A:
    def __init__(self):
        self.b = B()

A().b.c.m()
