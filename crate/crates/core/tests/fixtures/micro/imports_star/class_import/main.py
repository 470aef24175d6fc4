from shapes import Square

Square().area()
