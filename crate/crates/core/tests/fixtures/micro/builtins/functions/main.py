items = [3, 1, 2]
n = len(items)
ordered = sorted(items)
print(n, ordered)
