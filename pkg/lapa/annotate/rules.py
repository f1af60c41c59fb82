"""Keyword/regex table used by the rule backend.

Rules are tried in order and the first match wins. A rule either names a fixed catalog label or takes
the label from its `label` group. Descriptions matching no rule are not persistence.
"""
import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Rule:
    name: str
    pattern: re.Pattern[str]
    label: str | None
    reasoning: str

    def apply(self, description: str) -> str | None:
        match = self.pattern.search(description)
        if not match:
            return None
        if self.label is not None:
            return self.label
        return match.group("label").strip()


def _rule(name: str, pattern: str, label: str | None, reasoning: str) -> Rule:
    return Rule(name=name, pattern=re.compile(pattern, re.IGNORECASE), label=label, reasoning=reasoning)


RULES: list[Rule] = [
    _rule(
        "explicit",
        r"persistence (?:via|using|through) (?P<label>[^.;\n]+)",
        None,
        "The operator states the persistence mechanism explicitly.",
    ),
    _rule(
        "admin_account",
        r"\b(?:create|created|add|added)\b.*\b(?:admin|administrator|privileged)\b.*\baccount\b",
        "Account Manipulation",
        "A privileged account was set up to keep access.",
    ),
    _rule("web_shell", r"\bweb ?shell\b", "Web Shell", "A web shell keeps remote access through the web server."),
    _rule(
        "scheduled_task",
        r"\b(?:schtasks|scheduled task)\b",
        "Scheduled Task",
        "A scheduled task re-launches the implant.",
    ),
    _rule("cron", r"\bcron(?:tab| job)?\b", "Cron", "A cron entry re-launches the implant."),
    _rule(
        "ssh_keys",
        r"\b(?:authorized_keys|ssh (?:public )?key)\b",
        "SSH Authorized Keys",
        "An attacker SSH key grants future logins.",
    ),
    _rule(
        "run_key",
        r"\b(?:run ?key|startup folder)\b",
        "Registry Run Keys / Startup Folder",
        "An autostart entry runs the implant at logon.",
    ),
    _rule(
        "create_account",
        r"\b(?:create|created|add|added)\b (?:a )?(?:new )?(?:local |domain )?(?:user|account)\b",
        "Create Account",
        "A new account gives an independent way back in.",
    ),
    _rule(
        "auth_process",
        r"\b(?:pam|authentication|auth) (?:module|process|package)\b.*\b(?:modif|backdoor|patch)",
        "Modify Authentication Process",
        "The authentication path was altered to accept attacker credentials.",
    ),
    _rule(
        "valid_accounts",
        r"\b(?:stolen|harvested|reused?|cracked) credentials\b",
        "Valid Accounts",
        "Legitimate credentials are kept for re-entry.",
    ),
    _rule(
        "service",
        r"\b(?:installed|created|registered) (?:a )?(?:new )?(?:windows )?service\b",
        "Windows Service",
        "A service restarts the implant with the system.",
    ),
    _rule("systemd", r"\bsystemd (?:unit|service)\b", "Systemd Service", "A systemd unit restarts the implant."),
]


def match_rule(description: str) -> tuple[Rule, str] | None:
    for rule in RULES:
        label = rule.apply(description)
        if label:
            return rule, label
    return None
