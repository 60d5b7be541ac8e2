#!/usr/bin/env python3
"""Writes assets/prompts/: 10 paraphrased variants of every prompt template.

Each variant combines its own study introduction, state lead-in, question and
answer-format wording. Rerun after editing the fragments below.
"""
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "assets" / "prompts"

INTRO = {
    "study1": [
        "You are taking part in a study in which a virtual coach helps you prepare to quit smoking. In each session the coach gives you a small preparatory activity.",
        "Imagine you are a smoker who is getting ready to quit with the help of a virtual coach. Every session, the coach suggests a short activity to prepare for quitting.",
        "You are a participant in a program for people who smoke and want to prepare for quitting. A chatbot coach gives you one preparatory activity per session.",
        "Picture yourself preparing to quit smoking. A virtual coach talks with you in regular sessions and each time gives you an activity to do before the next one.",
        "You smoke and have joined a study with a virtual coach that supports preparing to quit. At the end of each session you get an activity to work on.",
        "Suppose you are using a conversational coach to prepare for quitting smoking. Each conversation ends with a small activity for you to carry out.",
        "You are someone who smokes and who is working with a digital coach to prepare for quitting. The coach assigns you a preparatory activity in every session.",
        "In this scenario you are preparing to stop smoking and talk regularly with a virtual coach, which hands you a small activity after each conversation.",
        "Take the role of a smoker in a coaching study. A virtual coach meets you in several sessions and asks you to do one preparatory activity each time.",
        "You are preparing to quit smoking with support from an automated coach. In every session the coach proposes an activity that helps you get ready to quit.",
    ],
    "study2": [
        "You are taking part in a study in which a virtual coach helps you prepare to quit smoking. The coach proposes activities that build the skills and mindset needed to quit.",
        "Imagine you are a smoker preparing to quit with the help of a virtual coach. The coach suggests activities that help you build what you need to quit successfully.",
        "You are a participant in a program for people who smoke. A chatbot coach gives you activities meant to prepare you for quitting.",
        "Picture yourself getting ready to quit smoking. A virtual coach regularly gives you an activity or a message to help you prepare.",
        "You smoke and have joined a study with a virtual coach. In each session the coach gives you an activity to prepare for quitting smoking.",
        "Suppose you are using a conversational coach to get ready to quit smoking. Each conversation ends with something for you to do.",
        "You are someone who smokes and who works with a digital coach on preparing to quit. The coach assigns you one activity in every session.",
        "In this scenario you are preparing to stop smoking with a virtual coach that gives you an activity after each conversation.",
        "Take the role of a smoker in a coaching study. A virtual coach meets you in several sessions and hands you an activity each time.",
        "You are preparing to quit smoking with an automated coach. In every session the coach proposes an activity for you.",
    ],
    "study3": [
        "You are taking part in a study in which a virtual coach helps you prepare to quit smoking. Every few days the coach gives you a small activity, and sometimes a human coach sends you feedback afterwards.",
        "Imagine you are a smoker preparing to quit with a virtual coach that gives you a short activity every three days. After some activities, a human coach sends a feedback message.",
        "You are a participant in a program in which a chatbot gives people who smoke an activity to prepare for quitting. Human coaches can add a personal feedback message.",
        "Picture yourself getting ready to quit smoking. A virtual coach gives you an activity in each session, and a human coach may reply to what you did.",
        "You smoke and have joined a study with a virtual coach. In each session you get an activity, and afterwards you may receive a message from a human coach.",
        "Suppose you are using a conversational coach to prepare for quitting smoking. Each session includes an activity, possibly followed by feedback from a real person.",
        "You are someone who smokes and who works with a digital coach on preparing to quit. Now and then, a human coach also reads your answers and writes to you.",
        "In this scenario you are preparing to stop smoking with a virtual coach that gives you an activity every few days. A human coach sometimes sends feedback.",
        "Take the role of a smoker in a coaching study. A virtual coach gives you activities, and a human coach might comment on your work.",
        "You are preparing to quit smoking with an automated coach that hands out small activities. Some sessions are followed by a feedback message from a human coach.",
    ],
    "study4": [
        "You are taking part in a study in which an app gives you a daily challenge to practise a way of coping with stress.",
        "Imagine you use a well-being app that suggests one coping challenge per day.",
        "You are a participant in a program that helps people cope with stress by giving them one small challenge every day.",
        "Picture yourself using an app for mental well-being. Each day it offers a challenge based on a coping strategy.",
        "You have joined a study on mental well-being. Every day an app proposes a coping challenge for you to try.",
        "Suppose you are using a mobile app that gives daily challenges to help you deal with stress.",
        "You are someone who uses a well-being app. The app gives you a short coping challenge each day.",
        "In this scenario an app supports your mental well-being by giving you one coping challenge a day.",
        "Take the role of a participant in a well-being study who receives a daily coping challenge from an app.",
        "You are using an app that helps you practise coping strategies through one challenge per day.",
    ],
}

STATE_LEAD = [
    "Your current situation:",
    "This is how you feel right now:",
    "Your answers to the check-in questions today:",
    "Here is your current state:",
    "At the moment, this describes you:",
    "Your current answers are:",
    "This is where you stand right now:",
    "Your present state is:",
    "Right now your answers to these questions are:",
    "Current situation:",
]

ACTION_LEAD = {
    "study1": ["Today's activity comes with this message:", "The coach adds the following:", "With the activity, the coach does this:",
               "This session, the coach uses this approach:", "Alongside the activity:", "The coach frames the activity like this:",
               "In this session:", "The activity is introduced as follows:", "What the coach does:", "The coach's approach today:"],
    "study2": ["Today's activity is", "The coach gives you", "This session you get", "You are asked to do", "The coach proposes",
               "Your activity for this session is", "You receive", "The coach hands you", "This time the coach gives you", "Your task is"],
    "study3": ["About this session:", "What happens after the activity:", "Feedback in this session:", "This time:",
               "After you finish:", "In this session:", "The feedback situation:", "Following the activity:",
               "Regarding feedback:", "After the activity:"],
    "study4": ["Today's challenge is", "The app gives you", "Today you receive", "Your challenge for today is",
               "The app suggests", "Today's suggestion is", "You are offered", "The app proposes", "This day brings",
               "The challenge of the day is"],
}

REWARD_Q = {
    "effort": [
        "How much effort would you spend on the activity, on a scale from 0 (none) to 10 (a lot)?",
        "On a scale from 0 to 10, how much effort would you put into the activity?",
        "Rate the effort you would spend on this activity from 0 (no effort) to 10 (maximum effort).",
        "How hard would you work on the activity? Use a number from 0 to 10.",
        "From 0 to 10, where 0 means no effort at all and 10 means a great deal, how much effort would you put in?",
        "Estimate the effort you would invest in the activity on a 0 to 10 scale.",
        "How much effort would you give this activity? Answer with a number between 0 and 10.",
        "Using a scale of 0 (nothing) to 10 (very much), how much effort would you spend?",
        "What amount of effort would you put into the activity, from 0 to 10?",
        "Say how much effort you would spend on the activity, from 0 (none) to 10 (very much).",
    ],
    "completion": [
        "Would you complete today's challenge?",
        "Do you think you would finish the challenge today?",
        "Would you carry out this challenge today?",
        "Would you manage to complete the challenge?",
        "Would you do the challenge today?",
        "Do you expect to complete today's challenge?",
        "Would you get this challenge done today?",
        "Would you complete the challenge the app gave you?",
        "Are you going to finish today's challenge?",
        "Would you follow through on this challenge today?",
    ],
}

NEXT_Q = {
    "study1": "how would you answer the same three questions at the next session",
    "study2": "how would you answer the same three questions at the next session",
    "study3": "how would you answer the same three questions three days later, at the next session",
    "study4": "how would you answer the same two questions tomorrow",
}

NEXT_LEAD = [
    "After doing the activity, {q}?",
    "Think about the time until the next session: {q}?",
    "Given this, {q}?",
    "Predict {q}.",
    "Considering the activity, {q}?",
    "Taking everything into account, {q}?",
    "Now estimate {q}.",
    "Imagine the time has passed: {q}?",
    "Based on your situation and the activity, {q}?",
    "Please predict {q}.",
]

NEXT_FORMAT = {
    "study1": "three numbers from 0 to 10",
    "study2": "three numbers from 0 to 10",
    "study3": "three numbers from 0 to 10",
    "study4": "a tiredness number from 0 to 10 and 1 or 0 for whether you completed today's challenge",
}

FORMAT_REWARD = {
    "effort": ["Answer in the form 'effort: N'.", "Reply only with 'effort: N', where N is your number.",
               "Write your answer as 'effort: N'.", "Give your answer as 'effort: N' and nothing else.",
               "Format: effort: N", "End with a line 'effort: N'.", "Respond with 'effort: N'.",
               "Use the format 'effort: N'.", "Your answer must look like 'effort: N'.", "Answer as 'effort: N'."],
    "completion": ["Answer in the form 'completed: yes' or 'completed: no'.", "Reply only with 'completed: yes' or 'completed: no'.",
                   "Write your answer as 'completed: yes' or 'completed: no'.", "Give 'completed: yes' or 'completed: no' and nothing else.",
                   "Format: completed: yes|no", "End with a line 'completed: yes' or 'completed: no'.",
                   "Respond with 'completed: yes' or 'completed: no'.", "Use the format 'completed: yes' or 'completed: no'.",
                   "Your answer must be 'completed: yes' or 'completed: no'.", "Answer as 'completed: yes' or 'completed: no'."],
}

FORMAT_NEXT = ["Answer with {f} as a list like [a, b, c], in the same order as above.",
               "Reply only with a list of {f}, in the order given above, e.g. [a, b, c].",
               "Write your answer as a bracketed list of {f}, in the order above.",
               "Give {f} as [a, b, c] and nothing else, keeping the order above.",
               "Format: a list of {f} in the order above, e.g. [a, b, c].",
               "End with a bracketed list of {f} in the order of the questions.",
               "Respond with {f} in square brackets, in the order above.",
               "Use the format [a, b, c] with {f}, in the order given.",
               "Your answer must be a list of {f} in square brackets, same order as above.",
               "Answer with a list [a, b, c] of {f}, in the order of the questions."]

COT = ["Think step by step before answering: first consider each part of your current situation, then how the {thing} would affect you, and only then decide. {fmt}",
       "Reason it through in steps. Look at each value of your situation, then at the {thing}, then give your answer. {fmt}",
       "Explain your reasoning step by step, considering your current state and the {thing}, and finish with your final answer. {fmt}",
       "Before you answer, think aloud: go through your situation one item at a time and consider the {thing}. {fmt}",
       "Work through this step by step: your current situation, the {thing}, and finally your answer. {fmt}",
       "Take it one step at a time. Describe how each part of your state and the {thing} influence you, then answer. {fmt}",
       "First reason about your situation and the {thing} in a few steps, then give the final answer. {fmt}",
       "Walk through your reasoning step by step and conclude with your answer. Consider the {thing} carefully. {fmt}",
       "Think carefully in steps about your state and the {thing}. After your reasoning, give the answer. {fmt}",
       "Break the question down: consider each value of your state, then the {thing}, then answer. {fmt}"]

THING = {"study1": "activity and the coach's message", "study2": "activity", "study3": "activity and the feedback situation",
         "study4": "challenge"}


def body(study, kind, length, style, v):
    i = v - 1
    lines = [INTRO[study][i], "", STATE_LEAD[i], "{{state}}", "", ACTION_LEAD[study][i] + " {{action}}"]
    if length == "ext":
        lines.append("{{action_text}}")
    lines += ["", "{{examples}}", ""]
    reward_kind = "completion" if study == "study4" else "effort"
    if kind == "reward":
        question = REWARD_Q[reward_kind][i]
        fmt = FORMAT_REWARD[reward_kind][i]
    else:
        question = NEXT_LEAD[i].format(q=NEXT_Q[study])
        question = question[0].upper() + question[1:]
        fmt = FORMAT_NEXT[i].format(f=NEXT_FORMAT[study])
    lines.append(question)
    if style == "cot":
        lines.append(COT[i].format(thing=THING[study], fmt=fmt))
    else:
        lines.append(fmt)
    return "\n".join(lines) + "\n"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    count = 0
    for study in ["study1", "study2", "study3", "study4"]:
        lengths = ["ext"] if study == "study4" else ["base", "ext"]
        for kind in ["reward", "next"]:
            for length in lengths:
                for style in ["plain", "cot"]:
                    for v in range(1, 11):
                        name = f"{study}_{kind}_{length}_{style}_v{v:02d}.txt"
                        (OUT / name).write_text(body(study, kind, length, style, v))
                        count += 1
    print(f"wrote {count} templates to {OUT}")


if __name__ == "__main__":
    main()
