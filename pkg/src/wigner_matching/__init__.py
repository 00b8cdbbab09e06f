class Result(object):
    def __init__(self, passed: bool, msg='', reports=None):
        self.passed = passed
        self.msg = msg
        self.reports = reports if reports is not None else []

    def to_json(self):
        return {
            'passed': self.passed,
            'msg': self.msg,
            'reports': [r if isinstance(r, dict) else r.to_json() for r in self.reports],
        }
