class Node:
    def next(self):
        return Node()

    def done(self):
        pass

Node().next().done()
