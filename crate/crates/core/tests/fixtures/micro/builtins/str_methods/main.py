parts = "tel-num".split("-")
text = "-".join(parts)
text.upper()
