def check():
    return True

def act():
    pass

if check():
    act()
