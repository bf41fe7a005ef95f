"""Small Prolog sources used across the tests.

These are classic textbook-style predicates written in the house style the
checker enforces; several are deliberately canonical (they must lint clean
at warning level) and a few carry deliberate mistakes.
"""

SAME_LENGTH = """\
same_length([], []).
same_length([_|L1], [_|L2]) :-
    same_length(L1, L2).
"""

ORD_UNION_ALL = """\
ord_union_all(N, Sets0, Union, Sets) :-
    A is N / 2,
    Z is N - A,
    ord_union_all(A, Sets0, X, Sets1),
    ord_union_all(Z, Sets1, Y, Sets),
    ord_union(X, Y, Union).
"""

PROCESS_QUERIES = """\
process_queries :-
    repeat,
        read_query(Q),
        handle(Q),
        Q = [quit],
    !,
    write('All done.'), nl.
"""

REMOVE_DUPLICATES = """\
remove_duplicates([First|Rest], Result) :-
    member(First, Rest),
    !,
    remove_duplicates(Rest, Result).
remove_duplicates([First|Rest], [First|New_Rest]) :-
    % First is not duplicated.
    remove_duplicates(Rest, New_Rest).
"""

#: A summing predicate with two deliberate singletons in the middle clause
#: (T is matched but never used; the recursive call says Rest instead).
SUM_LIST_BUGGY = """\
%% sum_list(+Number_List, ?Result)
%   Unifies Result with the sum of the numbers in Number_List;
%   calls error/1 if Number_List is not a list of numbers.

sum_list(Number_List, Result) :-
    sum_list(Number_List, 0, Result).

% sum_list(+Number_List, +Accumulator, ?Result)

sum_list([], A, A).       % At end: unify with accumulator.
sum_list([H|T], A, R) :-  % Accumulate first and recur.
  number(H),
  !,
  B is A + H,
  sum_list(Rest, B, R).
sum_list(_, _A, _R) :-    % Catch ill-formed arguments.
  error('first arg to sum_list/2 not a list of numbers').
"""

#: Counting loop whose FIRST clause needs its cut (not a terminal-cut bug).
COUNT_UP = """\
count_up(10) :-
    !.
count_up(X) :-
    write(X),
    Y is X + 1,
    count_up(Y).
"""

TERM_TRANSLATIONS = """\
term_translations([], []).
term_translations([Term|Terms], [Translation|Translations]) :-
    term_translation(Term, Translation),
    term_translations(Terms, Translations).
"""

SIMPLIFY_EXPRESSIONS = """\
simplify_expressions([], []).
simplify_expressions([E_in|Es_in], [E_out|Es_out]) :-
    simplify_expression(E_in, E_out),
    simplify_expressions(Es_in, Es_out).
"""

FOO_THREADED = """\
foo(Step, State0, State) :-
    foo_step(Step, State0, State1),
    foo(Step, State1, State).
"""

ITEMS_INCLUDING = """\
items_including(Tree, Flag, Labels) :-
    items_including(Tree, Flag, Labels, []).

items_including(empty, _, Labels, Labels).
items_including(node(Label, Left, Right), Flag, Labels0, Labels) :-
    items_including(Left, Flag, Labels0, Labels1),
    (   member(Flag, Label) ->
        Labels1 = [Label|Labels2]
    ;   Labels1 = Labels2
    ),
    items_including(Right, Flag, Labels2, Labels).
"""

CLEAN_SNIPPETS = {
    "same_length.pl": SAME_LENGTH,
    "ord_union_all.pl": ORD_UNION_ALL,
    "process_queries.pl": PROCESS_QUERIES,
    "remove_duplicates.pl": REMOVE_DUPLICATES,
}

ALL_SNIPPETS = dict(CLEAN_SNIPPETS)
ALL_SNIPPETS.update({
    "sum_list_buggy.pl": SUM_LIST_BUGGY,
    "count_up.pl": COUNT_UP,
    "term_translations.pl": TERM_TRANSLATIONS,
    "simplify_expressions.pl": SIMPLIFY_EXPRESSIONS,
    "foo_threaded.pl": FOO_THREADED,
    "items_including.pl": ITEMS_INCLUDING,
})
