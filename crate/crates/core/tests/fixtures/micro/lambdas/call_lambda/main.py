def target():
    pass

fn = lambda x: x()
fn(target)
