from hypothesis import settings

settings.register_profile('qudit', deadline=None, max_examples=40)
settings.load_profile('qudit')
