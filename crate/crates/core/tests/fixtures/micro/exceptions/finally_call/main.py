def risky():
    pass

def cleanup():
    pass

try:
    risky()
finally:
    cleanup()
