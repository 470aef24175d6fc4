class K:
    def m(self):
        pass

def build():
    return K()

build().m()
