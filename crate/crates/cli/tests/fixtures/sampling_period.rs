// Generated by sampling_oracle.py; (L, gamma, M, bound).
pub const SAMPLING_CASES: &[(f64, f64, f64, f64)] = &[
    (0.0, 0.5, 0.0, 1.0),
    (24.877605104407742, 355080.1582630001, 17832.629325836017, 4.4275566688447376835e-15),
    (0.07289203361185602, 8673.180319053332, 0.6485491622300565, 2.1212270234742856387e-5),
    (1.580235189477778e-05, 2911.992790705938, 11350.800115866708, 1.332447904285792086e-12),
    (0.00047561235537506877, 0.12145485484742291, 557.1781023016962, 1.3213246366156578205e-5),
    (16.226809129463085, 0.013133196490413042, 0.022364559140866193, 2.180307352676704533e-1),
    (0.0007328444383578619, 0.49546714966230604, 162.97732704106423, 3.7530774044722808838e-5),
    (2.840621921983052e-05, 0.0019017877603159214, 1.9361363915030012, 3.0470497566284065129e+1),
    (7.573612065671145e-05, 0.5127302383716611, 8.04474866689407, 1.1920313431494336141e-2),
    (4.795861668568944e-05, 580550.4635907796, 225.2349592649385, 1.6827151184808733079e-11),
    (0.6940881188350816, 2.3422348923269896, 35364.8429696347, 1.7067563581283418804e-10),
    (5.2254174556947754, 0.16567182835353655, 946.1491464771287, 3.3641624589294631439e-6),
    (36.358193131305754, 138.93115798161665, 3.913706897436277, 1.4825480696687500411e-4),
    (0.0010389908165090779, 32029.947951545764, 54.89366675321856, 4.9967609039504158508e-9),
    (30.282541170136437, 1508.496973042906, 5339.198694763437, 1.162279903216613594e-11),
    (0.21207058745018706, 2.4282495358730802, 2.008748623274224, 2.2636971445890718263e-2),
    (47.04729305505805, 1947.9021648691726, 6.97366842001837, 4.0364915034480476306e-6),
    (5.789395037483887e-06, 5.441935859872578, 1045.116177607661, 8.3956968548104172341e-8),
    (0.0004459269570984712, 81391.06988660869, 0.06537862936196909, 5.4123426567405373069e-6),
    (0.06705442927583603, 1432.257124348062, 0.027287184826504045, 3.3079248843381703486e-4),
    (0.19256767537908523, 1071.2944141921278, 991.3538342814077, 4.7394512413580828788e-10),
    (0.6479177542229081, 2091.2031706186553, 66974.40659134339, 5.3301945153112657112e-14),
    (19.87842833774977, 1.0230804077643658, 62.22543599616776, 1.2196163540061310744e-4),
    (39.882962976619176, 0.17174493218733286, 3.278788237461434, 3.2798959280302299996e-2),
    (1.4963953712927986, 3436.1938715496703, 9.583334912111383, 1.2991114835451638079e-6),
    (2.315443187583537e-06, 7944.242727798689, 25733.18450888616, 9.5037866516938372037e-14),
    (13.400219621572843, 4869.826237743671, 12470.060370316023, 6.6016086588193481576e-13),
    (1.4734644321041352, 0.23157603037120839, 234.67248125490795, 3.88717216146350026e-5),
    (0.004271713695832379, 395.76564059676554, 214.08278536172313, 2.7309931642548593128e-8),
    (4.932384851307242e-06, 53600.14264725434, 1.5869529009012733, 1.3938852265773084994e-6),
    (0.003244993321389254, 2.4168603174427394, 0.03516403484524077, 1.9294261698532939952e-1),
    (5.956734055639159e-05, 27.407708297104737, 75305.00940735228, 3.216903346525687937e-12),
    (0.34143163847864894, 0.0468565096499238, 0.9893273145691878, 1.5292327590543260351),
    (2.899441507981333e-06, 89074.14825240886, 76.81486720296702, 9.2702866824317583574e-10),
    (50.89264500325516, 0.0028994183988297613, 13.106118070641628, 4.4122474127729574095e-2),
    (1.1466182382302694, 13661.917056459224, 520.1889866588094, 1.3473111377828745217e-10),
    (3.0397791539513253, 2.383187785822669, 16952.639421041476, 7.2993780080069119055e-10),
    (6.061650086310778e-06, 1823.4600590548166, 0.01043821324312427, 2.685679747492491816e-4),
    (0.4738444804988431, 0.03193089762678873, 1.8196287386326928, 1.1112412189442820947),
    (21.806835215371322, 4.619876995540561, 23201.007094106688, 2.0104277923095019028e-10),
    (0.05982843928518074, 0.004699329246603575, 147.46495175187033, 4.8257059429960823737e-3),
    (0.0025359587707552947, 145350.6192597093, 0.03596734038443239, 3.2052431893150361695e-6),
    (91.75678786484674, 5.274374433627047, 21.064061974511457, 1.9132927740886631782e-4),
    (0.12834390073501661, 0.48740113233303073, 3134.5275998315665, 1.0434273325906398227e-7),
    (0.002092770805754995, 76.36208370134503, 8671.547822643885, 8.7056023770286147146e-11),
    (5.1484312957677475e-06, 0.5434690991222799, 1.336301994808715, 1.6855312628025309363e-1),
    (5.950382791248242e-05, 3551.9003876993916, 4.806994899179111, 4.174517995444938315e-6),
    (0.30362888808662086, 9497.705393916913, 9.235547768455431, 5.0249189941218559094e-7),
    (0.21145293612600724, 14.486092763415574, 0.015227974378888674, 3.325326319225913255e-2),
    (1.1519689469217738e-06, 35961.798208129854, 3.49989112383386, 6.8663287428796802729e-7),
    (0.03731613199802668, 0.6976804926291487, 2.558769480366287, 5.646746163913033855e-2),
    (0.5618978969636027, 55.28476062646717, 36601.23567601408, 6.7507083360549938794e-12),
    (0.016323729849002874, 410.4400982225042, 4742.697938318547, 5.4136000517276930386e-11),
    (3.3306142357366975, 11190.055798322157, 9784.760910075782, 4.6660410030713451187e-13),
    (0.0032635018750903854, 318.85219309764904, 0.0165632769175659, 1.5174333036145434954e-3),
    (0.014442986926685821, 0.003066567169637781, 8.674160112614924, 1.6997523314498498561),
    (0.00018814880093791822, 12013.359576031082, 1177.2319464455804, 2.998084990000416812e-11),
    (0.2635577640812379, 0.3652727209709689, 0.19250029627553092, 7.7853792664768045056e-1),
    (0.00011052101480541848, 15978.021940094857, 0.019720796097878305, 3.0094313236148915813e-5),
    (0.10751870320982894, 370.9820328951111, 0.049481783207316214, 1.223517499808671499e-3),
    (1.2455383685322938, 282382.28027155093, 0.11018161827618167, 1.4366259992998612307e-6),
    (6.974193162960903e-06, 23598.46845202151, 1.9420805075116088, 2.4478064847714083529e-6),
    (0.009446535443021951, 2469.4469177356673, 2870.508358378856, 2.4555576780696253543e-11),
    (0.000970380245082921, 0.01771421306000777, 5.571625757738311, 6.5317145734576330824e-1),
    (0.03872546867447266, 1538.9955186406755, 199.90527825801607, 8.0491487864866174567e-9),
    (13.203807008124787, 22.03651590307611, 36654.16782349465, 1.6887161180646866052e-11),
    (0.0015953163602304822, 0.004275687378914793, 903.1585115827226, 1.4304570133340163534e-4),
    (8.917029558781718e-05, 7735.692095238696, 1306.4667894077807, 3.7810245447398589997e-11),
    (10.661363111784949, 171256.133726354, 1.066769959935055, 6.834967020169099075e-7),
    (2.1570563875990603e-05, 64.50294553291023, 24.218935560354165, 1.218812650152897415e-5),
    (0.04516865726492459, 12223.54530901783, 3.250718745522387, 2.2638520076333401357e-6),
    (5.4772003016510675, 548.9515211712172, 187.53217815548018, 2.5625065277523625656e-8),
    (1.2051661593768632e-06, 655.5719086679845, 0.06907480814172727, 6.6731897876516635187e-4),
    (8.590841661029426, 0.0010827681293251901, 7220.753003925011, 8.8535255767748878238e-6),
    (0.34366826316611476, 86.8917082014176, 606.0005637041427, 1.5617570609330822342e-8),
    (31.23157722782026, 198910.68913760904, 30180.610571499023, 2.7594787876595780933e-15),
    (97.1678039985346, 346.428995830168, 90111.43349671949, 1.7774047371530448452e-13),
    (0.00014503152334815233, 0.4701853460632516, 0.14196194510412127, 8.1535416523557414507e-1),
    (0.3650361338082463, 41962.58080619607, 0.021808398460755458, 1.1412139420361424488e-5),
    (6.873161602624309, 0.01596060984779311, 1408.8249323314162, 1.5759524394712584214e-5),
    (0.006235577109985059, 3950.307215462044, 149.27908835149145, 5.6045665270790819092e-9),
    (0.14551053322820995, 28.742986638271276, 1.1274569000372061, 3.8412608630286019352e-3),
    (6.9774293829521256e-06, 4.4663974445834, 3143.8905677658486, 1.1318830646979446587e-8),
    (0.014403668634989163, 39770.7017908611, 2.2927056224441094, 1.1595805762225939884e-6),
    (2.21078629887096, 555193.3761245778, 0.03332941882341124, 8.4342667192138645637e-7),
    (0.009497993289469101, 19.005051778881487, 28.775577043668157, 2.9674297831049516097e-5),
    (5.6982016715159775e-06, 192.03287544015924, 114.37552076279506, 1.9559919847793100681e-7),
    (18.559132320104478, 1.4184030456572525, 1112.6265217350106, 2.8424244314778395089e-7),
    (0.0002739668792966633, 864.99998568612, 2.67207599842832, 4.2867738928569738361e-5),
    (0.015470167698192766, 72.48061990139367, 0.12261245432126766, 5.4733298240503815483e-3),
    (0.10973916535268098, 14.818425365215083, 75.82709699020859, 5.716613472895746628e-6),
    (7.680932162380292, 948582.3469077689, 13.003303071580808, 2.688029190522299766e-9),
    (0.00122333131706412, 2677.2501384980383, 15504.689599080064, 7.7678151660399776543e-13),
    (1.1998151132870088e-05, 0.46216540554684454, 10119.348869769696, 1.0562861918898133297e-8),
    (0.23092149885766056, 0.025274894359734384, 45.740910138958746, 9.036074469687097829e-3),
    (22.649146986292607, 18840.650877839616, 51763.52942981756, 9.903975595764337287e-15),
    (0.3491496263091763, 13.113344442992862, 22.714336199810283, 6.779915944822756181e-5),
    (0.8022848312905505, 0.0015441249841801018, 65715.12373056634, 7.4979691803784638898e-8),
    (0.627396741243266, 8201.063566334877, 0.607050263774675, 2.3606656090686269263e-5),
    (1.1590039796735087e-06, 3.576773616481798, 14299.040221778045, 6.8360311489632967584e-10),
    (0.0002457223608788609, 1.1932899592429835, 429.6414906827556, 2.2593955938583797103e-6),
    (0.0035220493363027384, 591.6364732322497, 0.1738636293629046, 6.1330828728448063675e-4),
];
