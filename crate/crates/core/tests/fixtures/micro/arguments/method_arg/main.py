class Box:
    def run(self, fn):
        fn()

def job():
    pass

Box().run(job)
