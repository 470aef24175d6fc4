def run():
    import tools
    tools.helper()

run()
