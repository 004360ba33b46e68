from hypothesis import settings

settings.register_profile("quadrix", deadline=None, max_examples=50)
settings.load_profile("quadrix")
