class K:
    @staticmethod
    def s():
        pass

    @classmethod
    def c(cls):
        cls.s()

K.c()
K().s()
