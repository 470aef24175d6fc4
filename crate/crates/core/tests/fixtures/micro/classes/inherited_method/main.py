class Base:
    def greet(self):
        self.name()

    def name(self):
        pass

class Child(Base):
    def name(self):
        pass

Child().greet()
