"""Prompt templates for every agent role.

Templates use ``string.Template`` placeholders (``$name``) because the
bodies contain literal JSON braces.
"""

from __future__ import annotations

import json
from string import Template

PERSONA_SYSTEM = "You are the Persona Agent. You write realistic, internally consistent character profiles as JSON."
EVENT_SYSTEM = "You are the Event Agent. You plan realistic life events for a persona and answer in JSON."
ARTIFACT_SYSTEM = "You are the Artifact Generator Agent. You write realistic digital records of everyday events."
CRITIC_SYSTEM = "You are a Critic Agent reviewing synthetic digital artifacts."
JUDGE_SYSTEM = "You are an expert evaluator for synthetic communication data."

PROFILE = Template("""\
**Role:**
You are tasked with writing a novel that captures life in the modern world.

**Mission:**
Your primary task is to develop a detailed concept for your novel's protagonist. This includes articulating specifics about their job, personal life, and social connections. You must organize and present this concept in a JSON format.

**Task Requirements:**
1. Populate each provided field relevant to the protagonist's life, including personal characteristics and daily routines. If a specific field (e.g., `classmates`) does not apply to your character design, omit this field entirely.
2. Any information you include must align with the initial input. If additional information is necessary and was not provided in the input, extrapolate reasonably based on the available data. Avoid using placeholders such as "not specified" or seeking further clarification.
3. Choose a name for your protagonist reflecting their gender and ethnicity to ensure authenticity and sensitivity.
4. Factor in the protagonist's income level when outlining their lifestyle, specifically their holiday and vacation activities.
5. Ensure all content is original and, when formatting your response, reference only the structure—not the content—of provided examples.
6. All output keys should be in English, and all values should be in the user's local language.
7. The protagonist's nationality should reflect only the nationality indicated on their passport, while the protagonist's residence address must correspond to the specified `locale` in the input.

**Input:**
The protagonist's profile should be JSON formatted and include:
- `name`: the protagonist's full name
- `locale`: language and geographic location
- `timezone`: local timezone
- `age`: age of the protagonist (string value)
- `gender`: gender identity
- `income`: income bracket
- `ethnicity`: ethnic background
- `family_setup`: description of familial relationships
- `nationality`: the protagonist's nationality

**Output:**
Your output should be a detailed JSON formatted document expanding upon the input and including additional fields such as:
- `surname`: protagonist's surname, resolved from the full name.
- `given_name`: protagonist's given name, resolved from the full name.
- `middle_name`: protagonist's middle name (if any), resolved from the full name. Omit this field if inapplicable.
- `nicknames`: list of protagonist's nicknames, in the user's local language.
- `email`: randomly generated email address using realistic username and domain conventions based on locale.
- `phone`: random generated phone number adhering to the locale's format.
- `eye_color`: one of [black, blue, brown, gold, gray, green, silver, white].
- `hair_color`: one of [black, blue, brown, gold, gray, green, silver, white].
- `height`: physical height.
- `weight`: physical weight.
- `occupation`: detailed job role, written in the user's local language.
- `weekdays_routines`: narrative of a typical weekday, written in the local language.
- `weekend_routines`: narrative of a typical weekend, written in the local language.
- `life_events_for_holidays_and_vacations`: description of holidays and vacation practices, written in the local language.
- `family_members`: list including names, ages, relations, occupations, and workplace/school addresses—all in the local language, with realistic naming conventions for the locale.
- `friends`: list of five friends' names in the local language, with culturally correct name order and spacing.
- `coworkers`: list of eight coworkers' names in the local language, with proper format.
- `classmates`: if applicable, list of ten classmates' names in the local language, formatted correctly.
- `home_address`: realistic residential address in the local language, aligned with the locale.
- `office_address`: realistic office address in the local language, aligned with the locale (omit if inapplicable).
- `school_address`: realistic school address in the local language (omit if inapplicable).

Each family member is an object with keys `name`, `age`, `relation`, `occupation`, `address`.

**Input profile:**
$draw
""")

REPAIR = Template("""\
Your previous answer did not satisfy the required output contract.

Problems found:
$violations

Previous answer:
$previous

Return a corrected answer that fixes every problem. Output only the JSON.""")

SEED_EVENTS = Template("""\
**Task**
Brainstorm possible events based on the profile. Consider all possibilities, and generate at least $num_seed_events events as comprehensive and diverse as possible.

Here are some tips for brainstorming:
- **Analyze Lifestyle.** Identify daily, weekly, and seasonal patterns. Consider work, hobbies, social life, and personal responsibilities.
- **Consider Recent Life.** Reflect on important events in the past two years.
- **Incorporate Professional and Personal Roles.** Include work-related tasks. Consider personal interests.
- **Account for Special Occasions and Holidays.** Include holiday traditions, family gatherings, and vacations. Consider birthdays, anniversaries, and cultural events.
- **Think About Common Responsibilities.** Cover financial management. Include household chores.
- **Consider Social and Recreational Activities.** Identify interactions with family, friends, and coworkers. Include leisure activities like travel, hobbies, or fitness.
- **Factor in Unexpected and Rare Events.** Account for emergencies (e.g., medical visits, car repairs). Consider special projects or one-time commitments.

**Output Format**
A JSON list of objects with the following fields:
- `event`: A clear and specific event title.
- `detailed_description`: A comprehensive explanation of the event for consistency and coherence.
- `frequency`: A string representing how often the event occurs, chosen from the predefined options: ["daily", "weekly", "monthly", "seasonally", "yearly", "once"].

**Input**
$profile

**Output**
Let's think step by step.
First, I need to break down the weekday and weekend routines into a list of events. Second, I need to brainstorm for events in the recent life.""")

_EVENT_FIELDS = """\
- `event`: A clear and specific event title.
- `detailed_description`: A comprehensive explanation of the event to ensure consistency and coherence.
- `frequency`: How often the event occurs—one of: ["daily", "weekly", "monthly", "seasonally", "yearly", "once"].
- `location`: A realistic and precise address that fits the event, suitable for a calendar entry. If the event could take place in multiple locations, leave this blank. You can reference locations from the profile or suggest reasonable alternatives.
- `other_participants`: A list of attendees, selected only from the names provided in the profile. If no additional participants are needed, leave this blank.
- `start_time`: The start time in RFC3339 format without a time zone.
- `end_time`: The end time in RFC3339 format without a time zone."""

ALIGN = Template(f"""\
**Task:**
You will receive a seed event and a persona profile. Rewrite the seed event so that it fits this persona: adapt the title and description to the persona's occupation, location, relationships and lifestyle, changing whatever details do not fit.

**Output Format:**
A single JSON object with the following fields:
{_EVENT_FIELDS}

**Persona profile:**
$profile

**Seed event:**
$seed

**Output:**""")

EXPANSION = Template(f"""\
**Input Format:**
You will receive a JSON object, representing an event with the following fields:
- `event`: A clear and specific event title.
- `detailed_description`: A comprehensive explanation of the event to ensure consistency and coherence.
- `frequency`: How often the event occurs—one of: ["daily", "weekly", "monthly", "seasonally", "yearly", "once"].
- `location`: A realistic and precise address that fits the event, suitable for a calendar entry. If the event could take place in multiple locations, it is left blank.
- `other_participants`: A list of attendees, selected only from the names provided in the profile. If no additional participants are needed, it is left blank.
- `start_time`: The start time in RFC3339 format without a time zone.
- `end_time`: The end time in RFC3339 format without a time zone.

**Your Task:**
You must analyze the event and brainstorm relevant events as comprehensively as possible. Here are some tips:
- **Think of All Possible Variations.** Account for different circumstances. Consider different methods or approaches. Consider various subcategories.
- **Consider Different Perspectives.** Look at the event from a personal, professional, logistical, and financial angle.
- **Include Decision Points and Contingencies.** Consider what happens if something goes wrong. Identify common problems and possible solutions.
- **Cover Tools, Resources, and External Interactions.** Mention necessary tools. Identify people involved.

If the event is atomic and should not be broken down further, output an empty list `[]`.

**Output Format:**
A list of JSON objects, representing relevant events with the following fields:
{_EVENT_FIELDS}

**Profile names you may use as participants:**
$names

**Examples:**
$examples

**Your Turn**

**Input:**
$input_event

**Output:**""")

EXPANSION_EXAMPLES = """\
Input: {"event": "book flights", "detailed_description": "Book round-trip flights for a conference.", "frequency": "once", "location": "", "other_participants": "", "start_time": "2024-04-02T20:00:00", "end_time": "2024-04-02T20:30:00"}
Output: [{"event": "receive booking confirmation", "detailed_description": "The airline emails the itinerary and confirmation number.", "frequency": "once", "location": "", "other_participants": "", "start_time": "2024-04-02T20:31:00", "end_time": "2024-04-02T20:32:00"}, {"event": "receive boarding pass", "detailed_description": "Check in online the day before departure and receive the mobile boarding pass.", "frequency": "once", "location": "", "other_participants": "", "start_time": "2024-05-13T08:00:00", "end_time": "2024-05-13T08:10:00"}]"""

REFLECTION = Template("""\
**Task:**
Review the event below, which was produced while expanding a persona's event tree. Check that it provides sufficient detail, follows a logical structure relative to its parent, is consistent with the persona, and is likely to leave a digital record (an email, a text message, a calendar entry, a reminder, or a wallet pass).

If it is acceptable, answer {"approved": true}.
Otherwise answer {"approved": false, "revised_event": <the corrected event with the same fields>}.

**Persona summary:**
$profile

**Parent event:**
$parent

**Event under review:**
$event

**Output (JSON only):**""")

ARTIFACT_CHOICE = Template("""\
**Task:**
Decide which digital record the event below most plausibly leaves in the persona's accounts, and whether the persona sent it or received it.

Answer with a JSON object:
- `kind`: one of ["email", "message_thread", "calendar_entry", "reminder", "wallet_pass"]
- `direction`: one of ["sent", "received"]
- `pass_kind`: only when kind is "wallet_pass"; one of ["boarding_pass", "ticket", "membership", "coupon"]

**Persona:** $full_name

**Event:**
$event

**Output (JSON only):**""")

KIND_LABELS = {
    "email": "email",
    "message_thread": "text message exchange",
    "calendar_entry": "calendar invitation",
    "reminder": "reminder",
    "wallet_pass": "wallet pass",
}

OUTLINE = Template("""\
**Task:**
You are a specialist in creating ${label}s. You will be provided with a JSON object representing an event.
Your objective is to generate a realistic outline for the **body** of the $label that $full_name **$sent_or_received**.

**Event Details (JSON):**
$event

**Note:** Some fields are guaranteed to be present (`event`, `detailed_description`, `start_time`, `end_time`, `location`, `other_participants`), while others are optional and should only be used if relevant.

**Instructions:**
1. Output a **detailed outline** (not a fully written $label) of the **sender's** $label.
2. You do not need to use all JSON fields, just those that make sense for the context of the $label.
3. Highlight any actions, requests, or follow-up details needed from the recipients.
4. Choose an appropriate tone suitable for the event context.
5. Do not include placeholder text. Instead, use actual data or reasonable, context-based values.
6. You may include additional resources or references, if applicable.

**Final Deliverable:**
Provide a structured outline (like headings and bullet points) of the $label body that $full_name $sent_or_received.
The outline should reflect the **sender's** viewpoint.

**Outline:**""")

OUTPUT_CONTRACTS = {
    "email": """\
The final email must be structured as a JSON object with the following keys:
- `sender_name`: The name of the sender.
- `from_address`: The sender's email address.
- `to_address`: The receiver's email address.
- `send_time`: The time the email is sent in RFC3339 format without a time zone.
- `subject`: A concise and relevant subject line.
- `body`: The complete email body text, following the outline.""",
    "message_thread": """\
The final text message exchange must be structured as a JSON object with the following keys:
- `participants`: list of at least two participant names, including the persona.
- `messages`: ordered list of objects with `sender` (one of the participants), `send_time` (RFC3339 without a time zone, non-decreasing) and `text`.""",
    "calendar_entry": """\
The final calendar invitation must be structured as a JSON object with the following keys:
- `title`: event title.
- `start_time`: start in RFC3339 format without a time zone.
- `end_time`: end in RFC3339 format without a time zone, not before the start.
- `location`: location text, or an empty string.
- `attendees`: list of attendee names.""",
    "reminder": """\
The final reminder must be structured as a JSON object with the following keys:
- `title`: short reminder title.
- `due_time`: when the reminder fires, RFC3339 format without a time zone.
- `note`: optional free-text note.""",
    "wallet_pass": """\
The final wallet pass must be structured as a JSON object with the following keys:
- `pass_kind`: one of ["boarding_pass", "ticket", "membership", "coupon"].
- `title`: what the pass is for.
- `reference_code`: booking or membership reference.
- `valid_from`: RFC3339 format without a time zone.
- `valid_until`: RFC3339 format without a time zone, not before valid_from.""",
}

GENERATION = Template("""\
You are a specialist in writing ${label}s. You will be provided with an outline of the $label along with additional reference content. Your job is to craft a realistic, engaging, and well-structured $label based on the outline.

**Instructions:**
1. **Input Details:**
   - **Outline:** You will receive an outline of the $label, which includes the main points and structure to cover.
   - **Additional Reference:** You will also be provided with a JSON object containing event-related details. The fields that are always present are: `event`, `detailed_description`, `start_time`, `end_time`, `location`, `other_participants`.
   - Other fields in the JSON object are optional. Use only the relevant fields to create a clear and effective $label.
2. **Composition Guidelines:**
   - Write a realistic and engaging $label that follows the provided outline.
   - Choose a tone that matches the context of the event and the intended recipients.
   - Incorporate relevant details from the additional reference JSON object, such as event name, dates, location, and any important context.
   - Only include information that directly contributes to the purpose and clarity of the $label.
3. **Output Structure:**
$contract
4. **Process:**
   - Start by reviewing the provided outline and event reference.
   - Develop a cohesive $label that aligns with the outline and appropriately integrates relevant event details.

**Persona:** $full_name <$email> ($sent_or_received)

**Outline:**
$outline

**Additional References:**
$event""")

CRITIC_FOCUS = {
    "event_consistency": "Focus only on consistency with the underlying event: titles, dates, times, places and participants must match the event record.",
    "persona_consistency": "Focus only on consistency with the persona: names, addresses, relationships, occupation and lifestyle must match the persona profile.",
    "realism_fluency": "Focus only on realism and fluency: the artifact should read like a genuine record, with natural language and no placeholders.",
}

REVIEW = Template("""\
$focus

You are an expert in $label review and writing. I will provide you with a $label, and I need you to offer detailed, constructive feedback to help improve it.

**Event:**
$event

**Persona:**
$profile

Here is the $label for review:
$artifact

Answer with a JSON object: {"verdict": "approve" | "revise", "feedback": "<your feedback; required when verdict is revise>"}.""")

REVISION = Template("""\
You are an expert at revising ${label}s. You will be provided with:
1. An original $label.
2. A set of suggestions on how to improve that $label.

**Objective:**
- Transform the original $label into a new version that incorporates the given suggestions.
- Ensure the final output strictly follows the JSON structure below.

**Output Format:**
$contract

**Instructions:**
- Retain any key information from the original $label.
- Incorporate the suggestions provided where relevant.
- The final version should reflect a polished, improved version of the original.
- Do not add any additional keys.

**Original:**
$original

**Suggestions:**
$suggestions""")

JUDGE = Template("""\
You are an expert evaluator for synthetic communication data.

Your task is to evaluate the following email based on multiple quality dimensions.

Carefully read the email content and provide structured ratings and feedback.

Evaluation Dimensions

1. Tone
  - Is the tone appropriate for the context?
  - Is it consistent throughout the email?
  - Is it aligned with the intended audience?
2. Fluency
  - Is the writing smooth and grammatically correct?
  - Does it sound natural to read?
3. Coherence
  - Are the ideas logically connected?
  - Is the email easy to follow?
4. Informativeness
  - Does the text provide useful, accurate, and complete information?
  - Does it avoid missing or misleading details?
5. Engagement
  - Does the text capture and maintain the reader's attention?
  - Does it encourage the reader to take action if needed?

Scoring Guideline (for each dimension)

5 = Excellent: Fully meets requirements, no issues.
4 = Good: Mostly meets requirements, with minor flaws.
3 = Fair: Some issues present, partially acceptable.
2 = Poor: Major issues, mostly unacceptable.
1 = Very Poor: Completely fails the requirement, unusable.

Output Requirements

Give a 1–5 score for each dimension with a short explanation (1–2 sentences).
Provide an overall evaluation with an overall score (average or holistic).
Use JSON format for the output.

Example Output

{
  "Tone": {
    "score": 4,
    "explanation": "Tone is polite and suitable for a business email, but slightly too formal for the intended young audience."
  },
  "Fluency": {
    "score": 5,
    "explanation": "Grammar and flow are flawless; very natural phrasing."
  },
  "Coherence": {
    "score": 4,
    "explanation": "Message is generally easy to follow, though one sentence feels abrupt."
  },
  "Informativeness": {
    "score": 5,
    "explanation": "All key details are included and accurate."
  },
  "Engagement": {
    "score": 3,
    "explanation": "The message provides information but lacks a strong hook to engage the reader."
  },
  "Overall": {
    "score": 4.2,
    "summary": "Well-written and informative, but slightly formal and could be more engaging."
  }
}

Input

input: $input""")


def dump(value) -> str:
    return json.dumps(value, ensure_ascii=False, indent=2, sort_keys=False)


def repair_prompt(original_prompt: str, violations: list[str], previous: str) -> str:
    return original_prompt + "\n\n" + REPAIR.substitute(
        violations="\n".join(f"- {v}" for v in violations), previous=previous[:4000]
    )
