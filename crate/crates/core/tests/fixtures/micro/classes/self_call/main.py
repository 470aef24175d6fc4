class A:
    def helper(self):
        pass

    def run(self):
        self.helper()

A().run()
