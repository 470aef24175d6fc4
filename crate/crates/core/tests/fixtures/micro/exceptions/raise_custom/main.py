class MyError(Exception):
    def __init__(self, msg):
        super().__init__(msg)

    def report(self):
        pass

def fail():
    raise MyError("x")

try:
    fail()
except MyError as e:
    e.report()
