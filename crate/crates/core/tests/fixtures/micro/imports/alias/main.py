import tools as t
from tools import helper as h

t.helper()
h()
