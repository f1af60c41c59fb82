import pytest

from lapa.annotate import rules


@pytest.mark.parametrize(
    "description, rule_name, label",
    [
        ("Established persistence via Cron; beacon every 5 min", "explicit", "Cron"),
        ("Added svc_backup to the Domain Admins privileged account group", "admin_account", "Account Manipulation"),
        ("Appended our key to authorized_keys on web01", "ssh_keys", "SSH Authorized Keys"),
        ("Set a Run key for the implant", "run_key", "Registry Run Keys / Startup Folder"),
        ("Patched the PAM module to accept a backdoor password", "auth_process", "Modify Authentication Process"),
        ("Installed a new service named updater", "service", "Windows Service"),
    ],
)
def test_match_rule(description, rule_name, label):
    rule, matched_label = rules.match_rule(description)

    assert rule.name == rule_name
    assert matched_label == label


def test_match_rule__explicit_statement_wins_over_keywords():
    rule, label = rules.match_rule("Persistence through Web Shell, plus a cron job")

    assert rule.name == "explicit"
    assert label == "Web Shell, plus a cron job"


def test_match_rule__no_match():
    assert rules.match_rule("Enumerated SMB shares on the file server") is None
